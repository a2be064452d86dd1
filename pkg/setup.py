from setuptools import setup, find_packages

setup(name="inexact-pgm",
      package_dir={"": "src"},
      packages=find_packages("src"),
      package_data={"": ["*.lark"]},
      install_requires=["lark>=1.1,<2", "numpy>=1.20"],
      entry_points={"console_scripts": ["inexact-pgm=inexact_pgm.main:main"]})

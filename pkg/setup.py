from setuptools import setup

setup(
    scripts=[
        "scripts/pytubal",
    ],
)

#!/usr/bin/env python
"""MFS setup script."""
from setuptools import setup

if __name__ == "__main__":
    setup(zip_safe=False)

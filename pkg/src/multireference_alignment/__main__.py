#!/usr/bin/env python3
"""
Main script for the multireference alignment toolkit
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
Main entry point for the multireference alignment toolkit
"""

import os
import sys

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from multireference_alignment.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())

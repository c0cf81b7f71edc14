"""
HOT-GP Laboratory
Command-line entry point: python app.py {train,sweep,plot,selftest} ...
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Entry point: load .env, then hand over to the command-line interface."""

from dotenv import load_dotenv

from src.cli import main

load_dotenv()

if __name__ == "__main__":
    raise SystemExit(main())

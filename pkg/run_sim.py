#!/usr/bin/env python3
"""
Quick start script for the simulator.

Usage:
    python run_sim.py spectrum
    python run_sim.py diffuse --paths 20000 --seed 7
"""

import os
import sys

# Add the repository root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.main import main

if __name__ == "__main__":
    sys.exit(main())

"""Allow running the console script with python -m fombound."""
from .cli import main

main()

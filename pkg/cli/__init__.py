"""
Command-line commands. Each module registers one command family on the
`pivq` group defined in main.py.
"""

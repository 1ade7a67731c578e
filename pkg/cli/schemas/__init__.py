"""
Pydantic schemas for machine-readable command outputs.
"""

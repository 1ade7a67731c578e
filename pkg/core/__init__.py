"""
Core domain types, deterministic randomness and file formats shared by every module.
"""

"""
Sampling and interpolation over CodeSets.
"""

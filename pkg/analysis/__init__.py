"""
Analysis modules: information capacity of discrete bottlenecks and linear probing of codes.
"""

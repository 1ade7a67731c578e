"""
Quantization: optimal bipartite assignment and the nearest / matching quantizers.
"""

"""
Codebook learning with delayed initialization, and the toy autoencoder training loop.
"""

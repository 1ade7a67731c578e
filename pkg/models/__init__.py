"""
Toy permutation-invariant autoencoder and artifact registry.
"""

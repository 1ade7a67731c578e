"""
Feature construction from coded datasets.
"""

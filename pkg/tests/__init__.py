"""
Test suite for the lambda-flows library
"""

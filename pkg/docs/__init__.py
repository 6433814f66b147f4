"""
Documentation for the lambda-flows library
"""

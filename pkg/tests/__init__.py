"""
Tests for the ADC bit allocation simulator.
"""

"""Epipolar calibration"""

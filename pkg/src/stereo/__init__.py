"""Stereo correspondence"""

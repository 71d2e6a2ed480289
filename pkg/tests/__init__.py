"""Tests for the lattice_embed package"""

"""Numerical services: analytics, simulation, estimation and finance."""

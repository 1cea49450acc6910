"""Cindergrace Toolkit Test Suite."""

"""Reproduction drivers for the gate, DAG and dyadic/triadic studies."""

"""Convex projective geometry toolkit for cusp holonomy certification."""

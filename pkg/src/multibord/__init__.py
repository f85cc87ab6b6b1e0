"""Multiple-point classes of generic immersions.

Algebra: graded rings, Poincare duality and the Herbert-Ronga recursion for
v_k and m_k.  Geometry: exact self-intersection enumeration for PL curves
and surfaces, pushoff Euler numbers, fold loci and tangent-direction points.
"""

__version__ = "0.1.0"

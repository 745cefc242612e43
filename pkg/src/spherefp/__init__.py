"""Constructive algebra of quadratic forms over prime fields: spherical
counting and character sums, division certificates on quadrics, M-set
combinatorics with Fubini averaging, and equidistribution testing for
polynomial sequences along spheres."""

__version__ = "0.1.0"

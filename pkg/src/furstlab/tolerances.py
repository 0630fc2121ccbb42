"""Global numerical tolerances.

Every module draws its tolerances from here: EXACT for identities that hold
up to floating-point roundoff, SLACK for inequalities that are theorems but
are checked on floating-point data.
"""

# Identities (orthonormality, idempotence, metric identity of indiscernibles).
TOL_EXACT = 1e-9

# Inequality slack (triangle inequalities, lemma-style bounds).
TOL_INEQ = 1e-8

# Relative tolerance for projective round-trips (homogeneous division).
TOL_PROJECTIVE = 1e-7

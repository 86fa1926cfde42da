"""matcrypt: matrix-group cryptography toolkit.

Trapdoored matrix-group instance generation from secret derivation trees,
commutator and identity-word key agreement, a free-group homomorphic
cryptosystem, tree-directed membership/transporter solvers, and brute-force
oracles plus attack experiments that validate the algorithms at desk scale.
"""

__version__ = "0.1.0"

"""
Moteurs de calcul : modèle d'instance, décomposition, marches, vérificateurs,
expansion, oracle spectral et compilation de circuits.
"""

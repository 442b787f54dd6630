"""
Utilitaires : schémas de fichiers, bibliothèque de fixtures, rapports.
"""

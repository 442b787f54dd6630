"""
Exceptions du paquet stoqverify.

Toutes les erreurs levées par la bibliothèque dérivent de StoqError, ce qui
permet à la ligne de commande de les convertir en rapport JSON (code 2).
"""


class StoqError(Exception):
    """Erreur de base du paquet"""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self):
        return {
            "type": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class InstanceParseError(StoqError):
    """Fichier d'instance illisible (JSON invalide, champ manquant)"""


class InstanceValidationError(StoqError):
    """Instance bien formée mais qui viole une contrainte du modèle"""

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(v["message"] for v in self.violations[:5])
        if len(self.violations) > 5:
            summary += f" (+{len(self.violations) - 5} autres)"
        super().__init__(f"Instance invalide: {summary}", {"violations": self.violations})


class DecompositionError(StoqError):
    """Échec de la décomposition non négative d'un projecteur"""


class NonUniformError(StoqError):
    """Un terme sort de la promesse d'uniformité"""


class SearchCapExceeded(StoqError):
    """Le parcours en largeur dépasse le plafond mémoire configuré"""


class NonCommutingError(StoqError):
    """Le vérificateur commutatif refuse une instance non commutative"""


class OracleError(StoqError):
    """Dimension trop grande ou non-convergence de l'oracle spectral"""


class CircuitError(StoqError):
    """Circuit réversible invalide ou entrées de mauvaise taille"""


class AnnihilationError(StoqError):
    """Le projecteur annule l'état : toutes les chaînes sont mauvaises pour le terme"""


class ReconstructionError(StoqError):
    """Impossible de reconstruire un chemin à partir du cône de lumière"""


class UsageError(StoqError):
    """Mauvaise utilisation de la ligne de commande"""


class ParameterError(StoqError):
    """Paramètre numérique hors de son domaine (epsilon, rayon, nombre d'essais...)"""

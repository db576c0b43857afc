"""
Exceptions de l'application GTT.

Chaque exception porte le code de sortie que la CLI renvoie lorsqu'elle
remonte jusqu'au point d'entrée :
- 1 : erreur d'utilisation ou de configuration
- 2 : erreur de données (fichiers illisibles, corrompus, incohérents)
- 3 : violation d'un invariant interne
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class GTTError(Exception):
    """Exception de base de l'application."""

    exit_code = EXIT_INTERNAL


class ConfigurationError(GTTError):
    """Exception levée lorsqu'une configuration est invalide."""

    exit_code = EXIT_USAGE


class DataError(GTTError):
    """Exception levée lorsqu'une donnée d'entrée est invalide ou illisible."""

    exit_code = EXIT_DATA


class InvariantViolation(GTTError):
    """Exception levée lorsqu'un invariant interne n'est pas respecté."""

    pass


class DimensionError(InvariantViolation, ValueError):
    """Exception levée lorsque les dimensions de deux tenseurs sont incompatibles."""

    pass


class TapeError(InvariantViolation):
    """Exception levée lors d'une rétropropagation impossible."""

    pass


class NonFiniteError(InvariantViolation, ArithmeticError):
    """Exception levée lorsqu'une valeur NaN ou infinie est détectée."""

    pass


class CorruptCheckpointError(DataError):
    """Exception levée lorsqu'un fichier binaire est tronqué ou mal formé."""

    pass


class ChecksumMismatchError(CorruptCheckpointError):
    """Exception levée lorsque la somme de contrôle CRC32 ne correspond pas."""

    pass


class CheckpointVersionError(CorruptCheckpointError):
    """Exception levée lorsque la version du format n'est pas prise en charge."""

    pass


class CorruptShardError(DataError):
    """Exception levée lorsqu'un fichier de corpus (shard ou manifeste) est invalide."""

    pass

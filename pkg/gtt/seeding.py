"""
Flux aléatoires nommés dérivés d'une graine unique.

Toute l'aléa de l'application provient de --seed : chaque composant (corpus,
initialisation, mélange, masquage) tire d'un sous-flux nommé, si bien qu'un
composant peut être ré-ensemencé dans les tests sans perturber les autres.
"""

import zlib
import numpy as np

STREAMS = ("corpus", "init", "shuffle", "mask", "synth", "eval")


def stream_key(name):
    """
    Convertit un nom de flux en clé entière stable.

    Args:
        name (str): Nom du sous-flux

    Returns:
        int: Clé CRC32 du nom
    """
    return zlib.crc32(name.encode("utf-8"))


def substream(seed, name, *keys):
    """
    Crée un générateur indépendant pour un sous-flux nommé.

    Args:
        seed (int): Graine maîtresse
        name (str): Nom du sous-flux (ex: "shuffle")
        *keys (int): Clés supplémentaires (index de série, numéro d'époque...)

    Returns:
        numpy.random.Generator: Générateur déterministe
    """
    spawn_key = (stream_key(name),) + tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))

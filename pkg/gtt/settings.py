"""
Paramètres d'exécution lus depuis l'environnement.

Ce module centralise les variables d'environnement (éventuellement chargées
depuis un fichier .env) : environnement courant, niveau de journalisation,
DSN Sentry et répertoire de sortie par défaut.
"""

import logging
import os
from dotenv import load_dotenv

# Charger le fichier .env s'il existe, sans écraser les variables déjà définies
load_dotenv(override=False)

# Niveaux de journalisation acceptés par la variable GTT_LOG
LOG_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

# Répertoire de sortie par défaut lorsque ni --out ni le fichier de configuration
# n'en précisent un
DEFAULT_OUT = "runs/default"


def get_environment():
    """
    Retourne le nom de l'environnement courant.

    Returns:
        str: Valeur de GTT_ENV (development, test, production)
    """
    return os.getenv("GTT_ENV", "development")


def get_log_level():
    """
    Retourne le niveau de journalisation demandé par GTT_LOG.

    Une valeur inconnue retombe sur INFO plutôt que d'interrompre le programme.

    Returns:
        int: Niveau du module logging
    """
    name = os.getenv("GTT_LOG", "info").strip().lower()
    return LOG_LEVELS.get(name, logging.INFO)


def get_sentry_dsn():
    """
    Retourne le DSN Sentry configuré, ou None.

    Returns:
        str | None: DSN Sentry
    """
    return os.getenv("SENTRY_DSN") or None


def get_default_out():
    """
    Retourne le répertoire de sortie par défaut.

    Returns:
        str: Chemin du répertoire de sortie
    """
    return os.getenv("GTT_DEFAULT_OUT", DEFAULT_OUT)

"""
Package principal de GTT, modèle de fondation pour la prévision de séries
temporelles multivariées.

Ce module initialise la journalisation et expose les composants principaux :
- Différentiation automatique (numerics)
- Préparation du corpus (datapipe)
- Modèle, entraînement, prévision et évaluation
"""

from .event_logging import configure_logging, init_sentry
from .exceptions import ConfigurationError, DataError, GTTError, InvariantViolation
from .model import ModelConfig, ModelParams, forward, param_count
from .training import Checkpoint, load_checkpoint, save_checkpoint
from .inference import ForecastRequest, forecast
from .evaluation import EvalSpec, rolling_eval

# Niveau de journalisation lu dans GTT_LOG
configure_logging()

# Initialisation de Sentry pour la journalisation des événements
# Cette fonction configure Sentry avec les paramètres du fichier .env
init_sentry()

__version__ = "0.1.0"

# Liste des éléments exposés par ce module
__all__ = [
    "Checkpoint",
    "ConfigurationError",
    "DataError",
    "EvalSpec",
    "ForecastRequest",
    "GTTError",
    "InvariantViolation",
    "ModelConfig",
    "ModelParams",
    "forecast",
    "forward",
    "load_checkpoint",
    "param_count",
    "rolling_eval",
    "save_checkpoint",
]

"""
Module de journalisation des événements pour GTT.

Ce module gère la journalisation des étapes du pipeline et des erreurs
à l'aide de logging et de Sentry. Il fournit des décorateurs pour faciliter
la journalisation des étapes importantes comme la construction du corpus,
l'entraînement, l'écriture des checkpoints, etc.
"""

import functools
import logging
from datetime import datetime, timezone
import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration
from .settings import get_environment, get_log_level, get_sentry_dsn

logger = logging.getLogger(__name__)

# Désactiver les logs de debug de Sentry
sentry_logger = logging.getLogger("sentry_sdk")
sentry_logger.setLevel(logging.WARNING)


def configure_logging(level=None):
    """
    Configure le logger racine.

    Args:
        level (int, optional): Niveau de journalisation. Par défaut, le niveau
            demandé par la variable GTT_LOG.
    """
    level = get_log_level() if level is None else level
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger().setLevel(level)


def init_sentry():
    """
    Initialise Sentry pour la journalisation des événements.

    Cette fonction configure Sentry avec le DSN fourni dans les variables
    d'environnement ou n'envoie rien si aucun DSN n'est fourni.
    Pour les environnements de test, Sentry est désactivé.
    """
    dsn = get_sentry_dsn()
    environment = get_environment()
    integrations = [
        LoggingIntegration(
            level=logging.INFO,  # Breadcrumbs à partir du niveau INFO
            event_level=logging.ERROR,  # Événements Sentry à partir du niveau ERROR
        )
    ]

    if environment == "test" or not dsn:
        sentry_sdk.init(
            dsn=None,
            environment=environment,
            traces_sample_rate=0.0,
            debug=False,
            integrations=integrations,
        )
        logger.debug(f"Sentry est désactivé (Environnement: {environment})")
        return

    sentry_sdk.init(
        dsn=dsn,
        environment=environment,
        traces_sample_rate=0.1,
        debug=False,
        integrations=integrations,
    )
    logger.info(f"Sentry est initialisé (Environnement: {environment})")


def _describe(value):
    """Résumé court d'un argument pour le contexte Sentry."""
    shape = getattr(value, "shape", None)
    if shape is not None:
        return f"{type(value).__name__}{tuple(shape)}"
    text = repr(value)
    return text if len(text) <= 80 else text[:77] + "..."


def log_pipeline_step(step_type):
    """
    Décorateur pour journaliser une étape du pipeline.

    En cas de succès, un message informatif est envoyé à Sentry ; en cas
    d'erreur, l'exception est capturée avec son contexte puis relevée.

    Args:
        step_type (str): Type d'étape (ex: "build_corpus", "train", etc.)

    Returns:
        function: Décorateur configuré
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                result = func(*args, **kwargs)

                with sentry_sdk.push_scope() as scope:
                    scope.set_tag("component", "pipeline")
                    scope.set_tag("step_type", step_type)
                    scope.set_context(
                        "step_details",
                        {
                            "args": [_describe(a) for a in args],
                            "kwargs": {k: _describe(v) for k, v in kwargs.items()},
                            "timestamp": datetime.now(timezone.utc).isoformat(),
                        },
                    )
                    sentry_sdk.capture_message(
                        f"Étape du pipeline: {step_type}",
                        level="info",
                    )

                return result
            except Exception as e:
                with sentry_sdk.push_scope() as scope:
                    scope.set_tag("component", "pipeline")
                    scope.set_tag("step_type", step_type)
                    scope.set_tag("error_type", type(e).__name__)
                    scope.set_context(
                        "step_context",
                        {
                            "args": [_describe(a) for a in args],
                            "kwargs": {k: _describe(v) for k, v in kwargs.items()},
                        },
                    )
                    sentry_sdk.capture_exception(e)
                raise

        return wrapper

    return decorator


def log_checkpoint_saved(func):
    """
    Décorateur pour journaliser l'écriture d'un checkpoint.

    La fonction décorée reçoit le checkpoint puis le chemin de destination.

    Args:
        func (function): Fonction à décorer

    Returns:
        function: Fonction décorée
    """

    @functools.wraps(func)
    def wrapper(ckpt, path, *args, **kwargs):
        try:
            result = func(ckpt, path, *args, **kwargs)

            with sentry_sdk.push_scope() as scope:
                scope.set_tag("component", "training")
                scope.set_tag("event_type", "checkpoint_saved")
                scope.set_context(
                    "checkpoint",
                    {
                        "path": str(path),
                        "step": getattr(ckpt, "step", None),
                        "epoch": getattr(ckpt, "epoch", None),
                        "timestamp": datetime.now(timezone.utc).isoformat(),
                    },
                )
                sentry_sdk.capture_message("Checkpoint enregistré", level="info")
            logger.debug(f"Checkpoint enregistré: {path}")

            return result
        except Exception as e:
            with sentry_sdk.push_scope() as scope:
                scope.set_tag("component", "training")
                scope.set_tag("error_type", type(e).__name__)
                scope.set_context("checkpoint", {"path": str(path)})
                sentry_sdk.capture_exception(e)
            raise

    return wrapper


def log_error(error, context=None):
    """
    Journalise une erreur dans Sentry avec le contexte fourni.

    Args:
        error (Exception): Erreur à journaliser
        context (dict, optional): Contexte additionnel. Defaults to None.
    """
    with sentry_sdk.push_scope() as scope:
        scope.set_tag("error_type", type(error).__name__)
        if context:
            scope.set_context("additional_context", context)
        sentry_sdk.capture_exception(error)
        logger.error(f"Erreur: {error}")

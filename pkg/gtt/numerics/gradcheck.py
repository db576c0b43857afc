"""
Vérification des gradients par différences finies centrées.
"""

from dataclasses import dataclass
import numpy as np
from .tensor import GradTape, backward


@dataclass
class GradCheckReport:
    """
    Résultat d'une vérification de gradient.

    Attributs :
        analytic (numpy.ndarray) : Gradient obtenu par la bande, coordonnées vérifiées
        numeric (numpy.ndarray) : Gradient par différences finies, mêmes coordonnées
        rel_errors (numpy.ndarray) : Erreur relative par coordonnée
        max_rel_error (float) : Pire erreur relative
        passed (bool) : max_rel_error < tol
        worst_index (tuple | None) : Coordonnée de la pire erreur
    """

    analytic: np.ndarray
    numeric: np.ndarray
    rel_errors: np.ndarray
    max_rel_error: float
    passed: bool
    worst_index: tuple = None


def relative_error(analytic, numeric, floor=1e-4):
    """
    Erreur relative |a − n| / max(|a|, |n|, floor).

    Le plancher rend la comparaison absolue pour les coordonnées dont le
    gradient est quasi nul.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def grad_check(f, x, h=1e-5, tol=1e-6, floor=1e-4, indices=None):
    """
    Compare le gradient de la bande à des différences finies centrées.

    `f` est appelée avec `x` et doit retourner un Tensor scalaire ; `x` est
    perturbé sur place, si bien que `f` peut aussi ignorer son argument et lire
    `x` à travers une fermeture (cas des paramètres d'un modèle).

    Args:
        f (callable): Fonction scalaire différentiable
        x (Tensor): Feuille suivie par le gradient
        h (float): Pas de différence finie
        tol (float): Tolérance sur l'erreur relative
        floor (float): Plancher du dénominateur de l'erreur relative
        indices (list[tuple], optional): Coordonnées à vérifier (toutes par défaut)

    Returns:
        GradCheckReport: Rapport par coordonnée
    """
    if x.grad is None:
        x.grad = np.zeros_like(x.data)
        x.requires_grad = True
    x.zero_grad()
    with GradTape() as tape:
        loss = f(x)
    backward(loss, tape)
    full_analytic = x.grad.copy()

    if indices is None:
        indices = list(np.ndindex(x.shape))
    indices = [tuple(int(i) for i in np.atleast_1d(idx)) for idx in indices]

    analytic = np.empty(len(indices), dtype=np.float64)
    numeric = np.empty(len(indices), dtype=np.float64)
    for n, idx in enumerate(indices):
        original = x.data[idx].copy()
        x.data[idx] = original + h
        upper = float(x.data[idx])
        f_plus = float(f(x).item())
        x.data[idx] = original - h
        lower = float(x.data[idx])
        f_minus = float(f(x).item())
        x.data[idx] = original
        numeric[n] = (f_plus - f_minus) / (upper - lower)
        analytic[n] = full_analytic[idx]

    rel = relative_error(analytic, numeric, floor)
    worst = int(np.argmax(rel)) if rel.size else None
    max_err = float(rel[worst]) if rel.size else 0.0
    return GradCheckReport(
        analytic=analytic,
        numeric=numeric,
        rel_errors=rel,
        max_rel_error=max_err,
        passed=max_err < tol,
        worst_index=indices[worst] if worst is not None else None,
    )

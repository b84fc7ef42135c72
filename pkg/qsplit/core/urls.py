"""
Command routing for the qsplit command line
"""
from qsplit.apps.scenarios import views

urlpatterns = {
    # Transfer matrix / stationary states
    'params': views.params_view,
    'stationary': views.stationary_view,
    'sweep': views.sweep_view,

    # Time-dependent channels
    'evolve': views.evolve_view,
    'moments': views.moments_view,
    'times': views.times_view,

    # Finite-difference cross-check and the invariant suite
    'oracle': views.oracle_view,
    'validate': views.validate_view,
}

import numpy as np

from cact.population import PopulationModel, ThresholdModel
from cact.scenario import Scenario
from cact.signal_info import build_info_structure, make_ci

M1 = [0.25, 0.30, 0.45]
M0 = [0.60, 0.35, 0.05]


def poisson_scenario(m1, m0, nbar, theta, cost, prior=0.5, joint1=None):
    joint1 = make_ci(m1) if joint1 is None else np.asarray(joint1)
    info = build_info_structure(prior, make_ci(m0), joint1)
    return Scenario(info, PopulationModel.poisson(nbar), ThresholdModel.deterministic(theta), cost)

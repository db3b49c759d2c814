# Copyright 2026 The nsswig Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Nested sampling with Slice-within-Gibbs kernels."""

from ._nsswig import *  # noqa: F401,F403
from ._nsswig import (
    FunnelConfig,
    FunnelModel,
    HierGaussConfig,
    HierGaussModel,
    KernelKind,
    RunConfig,
    run_nested_sampling,
)


def hier_gauss(groups=10, seed=0, **kwargs):
    """Hierarchical Gaussian model with freshly generated data."""
    cfg = HierGaussConfig()
    cfg.groups = groups
    cfg.seed = seed
    for key, value in kwargs.items():
        setattr(cfg, key, value)
    return HierGaussModel(cfg, generate_hg_data(cfg))  # noqa: F405


def funnel(groups=10, **kwargs):
    cfg = FunnelConfig()
    cfg.groups = groups
    for key, value in kwargs.items():
        setattr(cfg, key, value)
    return FunnelModel(cfg)


def run(model, kernel="swig", seed=0, live_points=1000, batch=50, sweeps=5, threads=1):
    """Runs nested sampling on `model` with the given settings."""
    cfg = RunConfig()
    cfg.kernel = KernelKind.swig if kernel == "swig" else KernelKind.nss
    cfg.seed = seed
    cfg.live_points = live_points
    cfg.batch = batch
    cfg.kernel_cfg.sweeps = sweeps
    cfg.threads = threads
    return run_nested_sampling(model, cfg)

# Copyright 2026 The mi-audit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Membership-inference auditing: shadow preparation, indicators, metrics."""

from ._core import (
    GaussianStats,
    MiAuditError,
    decide,
    default_rta_grid,
    fit_gaussian,
    format_config,
    lr_offline,
    lr_online,
    normal_cdf,
    phi,
    roc,
    rta,
    run_experiment,
    run_transfer,
    select_top_gaps,
    shadow_training_count,
    tpr_at_fpr,
)

__all__ = [
    "GaussianStats",
    "MiAuditError",
    "decide",
    "default_rta_grid",
    "fit_gaussian",
    "format_config",
    "lr_offline",
    "lr_online",
    "normal_cdf",
    "phi",
    "roc",
    "rta",
    "run_experiment",
    "run_transfer",
    "select_top_gaps",
    "shadow_training_count",
    "tpr_at_fpr",
]

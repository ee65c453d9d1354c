# Copyright 2026 The imthresh Authors.
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
"""Python bindings for the imitation threshold toolkit."""

import json as _json

from ._imthresh import (
    DomainError,
    FormatError,
    ImthreshError,
    ManifestError,
    UndefinedStatisticError,
    average_ranks,
    caption_miss_rate,
    cosine_similarity,
    default_penalty,
    estimate_frequency,
    exhaustive_change_points,
    fit_threshold,
    generate_synthetic,
    isotonic_fit,
    optimal_partition_change_points,
    pelt_change_points,
    read_embeddings,
    run_pipeline_json,
    segmentation_objective,
    select_dense_subset,
    spearman,
    threshold_agreement,
    write_embeddings,
)


def run_pipeline(manifest, output_dir, **options):
    """Runs every stage and returns the report as a dict."""
    return _json.loads(
        run_pipeline_json(str(manifest), str(output_dir), **options))


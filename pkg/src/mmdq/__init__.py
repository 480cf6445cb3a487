"""Quality scoring and loss reweighting for image-text-aspect corpora.

The pipeline has three stages: score each sample's image quality and
cross-modal relevance, fold the scores into a per-sample training weight,
and train a weighted classifier against an unweighted baseline.
"""

__version__ = "0.1.0"

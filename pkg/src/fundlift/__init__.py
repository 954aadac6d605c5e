"""fundlift: crowdfunding campaign success prediction, explanation, and
counterfactual text augmentation."""

__version__ = "0.1.0"

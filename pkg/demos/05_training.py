# coding: utf-8

# # Fitting the predicate thresholds
#
# Training is a plain grid search: a grid point is scored by how many
# labelled (clip, sentence) pairs it classifies correctly, where "positive"
# means the sentence tracker finds any satisfying assignment.

# In[1]:

from sentrack.predicates import PARAMETER_NAMES, ParameterSet
from sentrack.synth import EventSpec, make_clip
from sentrack.trainer import GridSpec, TrainingExample, grid_search

examples = [
    TrainingExample(make_clip(EventSpec("ride", "a")), "The person rode the horse", True),
    TrainingExample(make_clip(EventSpec("ride", "b", speed=16.0, start_x=200.0)),
                    "The person rode the horse quickly", True),
    TrainingExample(make_clip(EventSpec("ride", "c", rider_lift=140.0)), "The person rode the horse", False),
    TrainingExample(make_clip(EventSpec("ride", "d", speed=8.0)), "The person rode the horse quickly", False),
]


# Hold seven thresholds at their defaults and sweep the two that matter here.

# In[2]:

base = ParameterSet()
values = {n: (getattr(base, n),) for n in PARAMETER_NAMES}
values.update(overlap=(0.05, 0.2, 0.6), d_quickly=(4.0, 12.0, 20.0))
result = grid_search(examples, GridSpec(values))
print("accuracy", result.accuracy, "after", result.evaluations, "grid points")
print("overlap", result.params.overlap, "d_quickly", result.params.d_quickly)

# coding: utf-8

# # Tracking one object through a clip
#
# A clip is a short stack of frames, each holding scored boxes per class.
# The tracker picks one box per frame so that boxes are confident and
# each box lands where the previous one's flow said it would.

# In[1]:

from sentrack.synth import EventSpec, make_clip
from sentrack.tracker import best_track, motion_coherence

clip = make_clip(EventSpec("ride", "demo", clutter=3, score_jitter=0.3, seed=4))
print(len(clip), "frames,", [len(fr["horse"]) for fr in clip.frames][:6], "horse boxes in the first frames")


# The planted horse is one of four boxes per frame; the rest are low-scoring clutter.

# In[2]:

track = best_track(clip, "horse")
print("picks:", track.picks)
print("score: %.4f" % track.score)


# Motion coherence is 0.5 when the projected box misses by 50 px and
# close to 1 when flow predicts the next box exactly.

# In[3]:

a, b = track.detections[0], track.detections[1]
print("g(first step) = %.5f" % motion_coherence(a, b))

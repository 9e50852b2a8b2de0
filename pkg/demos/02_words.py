# coding: utf-8

# # Words as little state machines
#
# Each lexicon entry is a regular expression over per-frame predicates.
# Compiling it gives a machine with one start state and one accepting state.

# In[1]:

from sentrack.lexicon import recognize, stock_lexicon
from sentrack.predicates import ParameterSet
from sentrack.synth import EventSpec, make_clip

lex = stock_lexicon()
for name in lex:
    fsm = lex.fsm(name)
    print("%-16s states=%d shortest=%d" % (name, fsm.n_states, fsm.min_length()))


# `ride` needs the person to move with the horse, overlap it, and sit above it
# for at least five frames.

# In[2]:

params = ParameterSet()
clip = make_clip(EventSpec("ride", "demo"))
person = [fr["person"][0] for fr in clip.frames]
horse = [fr["horse"][0] for fr in clip.frames]
print("person rides horse:", recognize(lex.fsm("ride"), [person, horse], params))
print("horse rides person:", recognize(lex.fsm("ride"), [horse, person], params))

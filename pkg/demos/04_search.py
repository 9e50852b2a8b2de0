# coding: utf-8

# # Searching a synthetic corpus
#
# Fifty one-clip videos at mixed resolutions, three of which show a person
# riding a horse. The rest show leading, approaching, walking and so on.

# In[1]:

from sentrack.predicates import ParameterSet
from sentrack.search import baseline_search, format_table, index_corpus, search
from sentrack.synth import corpus_from_specs, discrimination_specs

cache = index_corpus(corpus_from_specs(discrimination_specs()))
params = ParameterSet()
print(len(cache), "clips indexed")


# Word order matters to the sentence tracker.

# In[2]:

print(format_table(search("The person rode the horse", cache, params)))
print(format_table(search("The horse rode the person", cache, params)))


# A detector-only baseline sees the same two classes in both sentences and
# cannot tell them apart.

# In[3]:

print(format_table(baseline_search(["person", "horse"], cache, k=5)))

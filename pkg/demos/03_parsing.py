# coding: utf-8

# # From sentence to query plan
#
# Parsing finds the participants (one per noun phrase, unless a noun repeats)
# and binds every word to the participants it talks about.

# In[1]:

import json

from sentrack.query import enumerate_template_queries, parse

plan = parse("The person rode the horse quickly away from the other horse")
print(json.dumps(plan.to_json(), indent=1))


# The template set covers the verbs, adverbs and motion phrases of the grammar.

# In[2]:

queries = enumerate_template_queries()
print(len(queries), "queries, e.g.")
for q in queries[::35]:
    print("  ", q)

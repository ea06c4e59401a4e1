"""CORGI: commonsense reasoning by instruction.

A Prolog-like knowledge base with soft (embedding-based) unification, a
neural proof guide trained on proof traces, and a conversational loop that
asks the user for missing knowledge and reports the commonsense
presumptions exposed by the resulting proof.
"""

__version__ = "0.1.0"

"""Heralded single- and two-photon Fock states from spectrally engineered PDC.

Pipeline: pump/crystal parameters -> joint spectral amplitude (:mod:`.pdc`)
-> Schmidt modes (:mod:`.schmidt`) -> filter/detector overlaps
(:mod:`.filtering`) -> closed-form heralding metrics (:mod:`.herald`) ->
design sweeps (:mod:`.design`). :mod:`.oracle` recomputes the metrics by brute
force in a truncated Fock space for validation.
"""

__version__ = "0.1.0"

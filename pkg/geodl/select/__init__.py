from geodl.select.herding import ExemplarMemory, select_exemplars

information = """
#########################################################################################

                           Geodesic Distillation Toolkit

geodl-kit distills knowledge between consecutive models of a class-incremental learner
along the geodesic flow joining their feature subspaces on the Grassmann manifold,
and runs the method on a desk-scale synthetic task stream.

Verbs:
    run       train every (mode, seed) pair and write results.csv and summary.csv
    verify    run the geometry, losses and sim property suites
    defaults  print the default configuration
    sweep     rerun a configuration over values of one key

"""

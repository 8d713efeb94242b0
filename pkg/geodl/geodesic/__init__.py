from geodl.geodesic.subspace import (
    Subspace,
    DegenerateSpanError,
    orthonormalize,
    pca_subspace,
    orthogonal_complement
)
from geodl.geodesic.flow import (
    GeodesicDecomposition,
    cs_decompose,
    geodesic_point
)
from geodl.geodesic.kernel import (
    LambdaTriple,
    GeodesicKernel,
    lambda_coefficients,
    geodesic_kernel,
    kernel_quadrature_oracle
)

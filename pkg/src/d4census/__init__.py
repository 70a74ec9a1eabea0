"""Exact census of dihedral octic extensions ordered by multi-invariants,
with the closed-form leading constant and its local decomposition."""

__version__ = "0.1.0"

from .arith import (
    CapacityError,
    DecomposedTriple,
    InvalidTripleError,
    SieveTables,
    SignedSquarefreeTriple,
    build_sieve,
    decompose_triple,
    kronecker,
    load_sieve_cache,
    primes_up_to,
    save_sieve_cache,
)
from .asymptotic import (
    EulerProductSpec,
    TamagawaParts,
    c_constant,
    c_tilde,
    constant_identity,
    leading_constant,
    lemma432_sums,
    predicted_count,
    tamagawa_constant,
)
from .census import (
    BoundBox,
    CensusReport,
    InertiaClass,
    InvariantVector,
    enumerate_admissible_triples,
    exact_census,
    inertia_class,
    invariants_of,
    splitting_rows,
    twist_count,
)
from .charsum import (
    CharacterSpec,
    ClassKey,
    L_divisor_sum,
    L_product,
    T111_direct,
    T_direct,
    bilinear_sum,
    census_from_classes,
    character_sum_f,
)
from .localsolve import (
    Place,
    REAL_PLACE,
    TWO_PLACE,
    find_conic_point,
    hilbert_symbol,
    in_E_set,
    padic_oracle,
    satisfies_local_conditions,
    u_weight,
)

"""arbor: rooted labeled tree problems as matrices, morphisms, and analogies.

Encode tree-shaped problems (mazes, probabilistic decision trees) as
characteristic matrices, compute transformations and distances between
them, solve them, and transfer solutions across structurally equivalent
problems.
"""

from .characteristic import (
    CharacteristicMatrix,
    MetricWeights,
    characteristic_matrix,
    characteristic_vector,
    matrix_to_csv,
    matrix_to_json,
)
from .errors import ArborError
from .metrics import matrix_distance, tree_distance
from .morphism import (
    Morphism,
    apply_morphism,
    compose,
    compute_morphism,
    identity_morphism,
    pseudoinverse,
)
from .problems import (
    MazeGrid,
    TreeProblem,
    decision_problem,
    generic_problem,
    maze_to_tree,
    parse_maze,
    problem_from_json,
    problem_to_json,
    solve,
    solve_min_length_to_goal,
    solve_most_probable_path,
    validate_problem,
)
from .solutions import (
    Solution,
    decode_path,
    encode_path,
    solution_distance,
    solution_morphism,
    solution_to_json,
)
from .transfer import (
    ProblemLibrary,
    functor_commute_check,
    match_tips,
    permute_tips,
    power_transform,
    rescale_transform,
    transfer_solution,
)
from .tree import (
    Combinator,
    FeatureSchema,
    LabeledTree,
    binarize,
    build_tree,
    canonical_edge_order,
    mrca,
    same_topology,
    tree_equal,
    validate,
)

__version__ = "0.1.0"

"""Expression trees: representation, evaluation, random construction and
the parenthesized prefix text format.

The function set is add/mul (arity 2), sum5 (arity 5), sigmoid/relu
(arity 1), max/min (arity 2) and a three-way ``if`` that returns its second
argument when the first is positive. Terminals are input features ``X<i>``
and constants drawn from U[-1, 1]. There is no division or subtraction, so
every tree is total on finite input; the only overflow risk is sigmoid's
exponential, which is clamped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARITY = {
    "add": 2,
    "mul": 2,
    "sum5": 5,
    "sigmoid": 1,
    "relu": 1,
    "max": 2,
    "min": 2,
    "if": 3,
}

FUNCTION_NAMES = tuple(ARITY)

SIGMOID_CLAMP = 500.0


@dataclass(frozen=True)
class Feature:
    index: int


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Func:
    op: str
    children: tuple

    def __post_init__(self):
        if self.op not in ARITY:
            raise ValueError(f"unknown operator {self.op!r}")
        if len(self.children) != ARITY[self.op]:
            raise ValueError(
                f"{self.op} takes {ARITY[self.op]} children, got {len(self.children)}"
            )


Node = Feature | Constant | Func


def eval_tree(node: Node, x: np.ndarray) -> np.ndarray:
    """Evaluate a tree on an (n, d) matrix, one output value per row.

    Outputs are intentionally not rescaled or normalised.
    """
    if isinstance(node, Feature):
        return x[:, node.index]
    if isinstance(node, Constant):
        return np.full(x.shape[0], node.value)
    op = node.op
    ch = node.children
    if op == "add":
        return eval_tree(ch[0], x) + eval_tree(ch[1], x)
    if op == "mul":
        return eval_tree(ch[0], x) * eval_tree(ch[1], x)
    if op == "sum5":
        acc = eval_tree(ch[0], x)
        for c in ch[1:]:
            acc = acc + eval_tree(c, x)
        return acc
    if op == "sigmoid":
        arg = np.clip(eval_tree(ch[0], x), -SIGMOID_CLAMP, SIGMOID_CLAMP)
        return 1.0 / (1.0 + np.exp(-arg))
    if op == "relu":
        return np.maximum(0.0, eval_tree(ch[0], x))
    if op == "max":
        return np.maximum(eval_tree(ch[0], x), eval_tree(ch[1], x))
    if op == "min":
        return np.minimum(eval_tree(ch[0], x), eval_tree(ch[1], x))
    # if
    return np.where(eval_tree(ch[0], x) > 0.0, eval_tree(ch[1], x), eval_tree(ch[2], x))


def eval_tree_cached(node: Node, x: np.ndarray, cache: dict) -> np.ndarray:
    """Like :func:`eval_tree`, but memoizes function-node results by object
    identity. Variation shares subtrees between related individuals, so a
    cache scoped to one evaluation batch skips most recomputation. Entries
    hold the node itself to keep its id stable for the cache's lifetime.
    """
    if isinstance(node, Feature):
        return x[:, node.index]
    if isinstance(node, Constant):
        return np.full(x.shape[0], node.value)
    hit = cache.get(id(node))
    if hit is not None:
        return hit[1]
    op = node.op
    ch = node.children
    if op == "add":
        out = eval_tree_cached(ch[0], x, cache) + eval_tree_cached(ch[1], x, cache)
    elif op == "mul":
        out = eval_tree_cached(ch[0], x, cache) * eval_tree_cached(ch[1], x, cache)
    elif op == "sum5":
        out = eval_tree_cached(ch[0], x, cache)
        for c in ch[1:]:
            out = out + eval_tree_cached(c, x, cache)
    elif op == "sigmoid":
        arg = np.clip(eval_tree_cached(ch[0], x, cache), -SIGMOID_CLAMP, SIGMOID_CLAMP)
        out = 1.0 / (1.0 + np.exp(-arg))
    elif op == "relu":
        out = np.maximum(0.0, eval_tree_cached(ch[0], x, cache))
    elif op == "max":
        out = np.maximum(eval_tree_cached(ch[0], x, cache),
                         eval_tree_cached(ch[1], x, cache))
    elif op == "min":
        out = np.minimum(eval_tree_cached(ch[0], x, cache),
                         eval_tree_cached(ch[1], x, cache))
    else:
        out = np.where(eval_tree_cached(ch[0], x, cache) > 0.0,
                       eval_tree_cached(ch[1], x, cache),
                       eval_tree_cached(ch[2], x, cache))
    cache[id(node)] = (node, out)
    return out


def eval_node(node: Node, instance) -> float:
    """Evaluate a tree on a single instance vector."""
    row = np.asarray(instance, dtype=np.float64).reshape(1, -1)
    return float(eval_tree(node, row)[0])


def eval_individual(trees, features: np.ndarray, cache: dict | None = None) -> np.ndarray:
    """Apply each tree to every instance: an (n, t) embedding matrix."""
    if cache is None:
        cols = [eval_tree(tree, features) for tree in trees]
    else:
        cols = [eval_tree_cached(tree, features, cache) for tree in trees]
    return np.column_stack(cols)


def tree_depth(node: Node) -> int:
    """Longest root-to-leaf path, counted in nodes (a lone terminal is 1)."""
    deepest = 1
    stack = [(node, 1)]
    while stack:
        cur, depth = stack.pop()
        if isinstance(cur, Func):
            if depth + 1 > deepest:
                deepest = depth + 1
            stack.extend((c, depth + 1) for c in cur.children)
    return deepest


def tree_size(node: Node) -> int:
    count = 0
    stack = [node]
    while stack:
        cur = stack.pop()
        count += 1
        if isinstance(cur, Func):
            stack.extend(cur.children)
    return count


def iter_nodes(node: Node, depth: int = 1):
    """Preorder (node, depth) pairs; the root has depth 1."""
    yield node, depth
    if isinstance(node, Func):
        for c in node.children:
            yield from iter_nodes(c, depth + 1)


def collect_nodes(node: Node) -> tuple[list, list[int]]:
    """Preorder node list and matching depths, root at depth 1."""
    nodes: list = []
    depths: list[int] = []
    stack = [(node, 1)]
    while stack:
        cur, depth = stack.pop()
        nodes.append(cur)
        depths.append(depth)
        if isinstance(cur, Func):
            stack.extend(
                (cur.children[i], depth + 1)
                for i in range(len(cur.children) - 1, -1, -1)
            )
    return nodes, depths


def replace_subtree(root: Node, target: int, replacement: Node) -> Node:
    """Return a copy of ``root`` with the ``target``-th preorder node swapped
    for ``replacement``. Shares untouched subtrees with the original."""

    def rec(node: Node, idx: int) -> tuple[Node, int]:
        if idx == target:
            return replacement, idx + 1
        if not isinstance(node, Func):
            return node, idx + 1
        idx += 1
        new_children = []
        changed = False
        for c in node.children:
            sub_size = tree_size(c)
            if idx <= target < idx + sub_size:
                new_c, idx = rec(c, idx)
                changed = True
            else:
                new_c = c
                idx += sub_size
            new_children.append(new_c)
        if not changed:
            return node, idx
        return Func(node.op, tuple(new_children)), idx

    new_root, _ = rec(root, 0)
    return new_root


def random_terminal(rng: np.random.Generator, n_features: int, p_feat: float) -> Node:
    if rng.random() < p_feat:
        return Feature(int(rng.integers(n_features)))
    return Constant(float(rng.uniform(-1.0, 1.0)))


# Probability of cutting a branch short with a terminal at an interior level
# of a grow-built tree.
GROW_TERMINAL_PROB = 0.3


def grow_subtree(rng: np.random.Generator, n_features: int, depth: int,
                 p_feat: float = 0.9) -> Node:
    """Grow-style construction capped at ``depth`` levels; terminals may
    appear early, and are forced at the cap."""
    if depth <= 1 or rng.random() < GROW_TERMINAL_PROB:
        return random_terminal(rng, n_features, p_feat)
    op = FUNCTION_NAMES[rng.integers(len(FUNCTION_NAMES))]
    return Func(op, tuple(
        grow_subtree(rng, n_features, depth - 1, p_feat)
        for _ in range(ARITY[op])
    ))


def full_subtree(rng: np.random.Generator, n_features: int, depth: int,
                 p_feat: float = 0.9) -> Node:
    """Full construction: functions everywhere above the terminal level."""
    if depth <= 1:
        return random_terminal(rng, n_features, p_feat)
    op = FUNCTION_NAMES[rng.integers(len(FUNCTION_NAMES))]
    return Func(op, tuple(
        full_subtree(rng, n_features, depth - 1, p_feat)
        for _ in range(ARITY[op])
    ))


def random_tree(rng: np.random.Generator, n_features: int, method: str,
                depth: int, min_depth: int = 2, p_feat: float = 0.9) -> Node:
    """Build an initial tree of the given target depth.

    ``full`` hits the target depth exactly; ``grow`` may stop early per
    branch but is retried until it reaches at least ``min_depth``.
    """
    if method == "full":
        return full_subtree(rng, n_features, depth, p_feat)
    if method == "grow":
        while True:
            tree = grow_subtree(rng, n_features, depth, p_feat)
            if tree_depth(tree) >= min_depth:
                return tree
    raise ValueError(f"unknown construction method {method!r}")


# --- text format -----------------------------------------------------------
#
# Parenthesized prefix notation, e.g. (if X3 (sigmoid X1) -0.25). Features
# are X<index>, constants are shortest round-trip decimals.


def to_prefix(node: Node) -> str:
    if isinstance(node, Feature):
        return f"X{node.index}"
    if isinstance(node, Constant):
        return repr(node.value)
    return "(" + node.op + " " + " ".join(to_prefix(c) for c in node.children) + ")"


class TreeParseError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_tree(text: str) -> Node:
    """Parse the prefix text format back into a tree. Inverse of
    :func:`to_prefix`."""
    tokens = _tokenize(text)
    if not tokens:
        raise TreeParseError("empty expression")
    pos = 0

    def atom(token: str) -> Node:
        if token.startswith("X") and token[1:].isdigit():
            return Feature(int(token[1:]))
        try:
            return Constant(float(token))
        except ValueError:
            raise TreeParseError(f"unexpected token {token!r}") from None

    def parse() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise TreeParseError("unexpected end of expression")
        token = tokens[pos]
        pos += 1
        if token != "(":
            if token == ")":
                raise TreeParseError("unexpected ')'")
            return atom(token)
        if pos >= len(tokens):
            raise TreeParseError("unexpected end of expression after '('")
        op = tokens[pos]
        pos += 1
        if op not in ARITY:
            raise TreeParseError(f"unknown operator {op!r}")
        children = []
        while pos < len(tokens) and tokens[pos] != ")":
            children.append(parse())
        if pos >= len(tokens):
            raise TreeParseError(f"missing ')' for {op!r}")
        pos += 1  # consume ')'
        if len(children) != ARITY[op]:
            raise TreeParseError(
                f"{op} takes {ARITY[op]} arguments, got {len(children)}"
            )
        return Func(op, tuple(children))

    tree = parse()
    if pos != len(tokens):
        raise TreeParseError(f"trailing tokens after expression: {tokens[pos]!r}")
    return tree


def fold_constants(node: Node) -> Node:
    """Collapse constant-only subtrees into single constants.

    Folding evaluates through the normal batch evaluator so the folded value
    is bit-identical to what the unfolded tree would have produced.
    """
    if not isinstance(node, Func):
        return node
    children = tuple(fold_constants(c) for c in node.children)
    if all(isinstance(c, Constant) for c in children):
        dummy = np.zeros((1, 1))
        value = float(eval_tree(Func(node.op, children), dummy)[0])
        return Constant(value)
    return Func(node.op, children)


def max_feature_index(node: Node) -> int:
    """Largest feature index referenced, or -1 for constant-only trees."""
    if isinstance(node, Feature):
        return node.index
    if isinstance(node, Func):
        return max(max_feature_index(c) for c in node.children)
    return -1

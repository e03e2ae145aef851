"""The benchmark programs, each built on trailed integer cells."""

from __future__ import annotations

from ..engine import SOLUTION, SearchProgram, Store

# -- queens -------------------------------------------------------------------
# cell 0: queens placed so far; cell c (1..N): row of the queen in column c


def gen_queens(n: int) -> SearchProgram:
    if not 4 <= n <= 13:
        raise ValueError("queens size must be between 4 and 13")
    rows = range(1, n + 1)

    def expand(cells):
        k = cells[0]
        if k == n:
            return SOLUTION
        col = k + 1
        placed = cells[1:col]
        safe = []
        for r in rows:
            for c, q in enumerate(placed, 1):
                if q == r or col - c == abs(r - q):
                    break
            else:
                safe.append(r)
        return safe

    def apply(state, row):
        k = state.cells[0] + 1
        state.write(k, row)
        state.write(0, k)
        return True

    return SearchProgram(f"queens({n})", Store([0] * (n + 1)), expand, apply,
                         solution=lambda cells: tuple(cells[1:]))


# -- naive sort ---------------------------------------------------------------
# cell 0: length of the permutation built so far; 1..N: the permutation;
# N+1..2N: used flags for the input positions


def gen_nsort(n: int) -> SearchProgram:
    if not 3 <= n <= 12:
        raise ValueError("nsort size must be between 3 and 12")
    source = tuple(range(n, 0, -1))
    used0 = n + 1

    def expand(cells):
        k = cells[0]
        if k == n:
            out = cells[1:n + 1]
            return SOLUTION if all(a <= b for a, b in zip(out, out[1:])) else None
        return [i for i in range(n) if not cells[used0 + i]]

    def apply(state, i):
        k = state.cells[0] + 1
        state.write(used0 + i, 1)
        state.write(k, source[i])
        state.write(0, k)
        return True

    return SearchProgram(f"nsort({n})", Store([0] * (2 * n + 1)), expand, apply,
                         solution=lambda cells: tuple(cells[1:n + 1]))


# -- hamiltonian cycles ---------------------------------------------------------
# cell 0: path length; 1..N: path; N+1..2N: visited flags


def ham_graph(n: int) -> list:
    """Circulant 3-regular graph: ring edges plus diameter chords."""
    if n < 4 or n % 2:
        raise ValueError("ham needs an even size of at least 4")
    half = n // 2
    return [sorted({(v + 1) % n, (v - 1) % n, (v + half) % n}) for v in range(n)]


def gen_ham(n: int) -> SearchProgram:
    adj = ham_graph(n)
    seen0 = n + 1
    cells = [0] * (2 * n + 1)
    cells[0] = 1
    cells[1] = 0
    cells[seen0] = 1

    def expand(cells):
        k = cells[0]
        last = cells[k]
        if k == n:
            return SOLUTION if 0 in adj[last] else None
        return [v for v in adj[last] if not cells[seen0 + v]]

    def apply(state, v):
        k = state.cells[0] + 1
        state.write(seen0 + v, 1)
        state.write(k, v)
        state.write(0, k)
        return True

    return SearchProgram(f"ham({n})", Store(cells, len(cells)), expand, apply,
                         solution=lambda cells: tuple(cells[1:n + 1]))


# -- maze: 4x4 sliding blank -----------------------------------------------------
# cells 0..15: board (0 is the blank); 16: blank position; 17: moves made;
# 18..: the moves

SIDE = 4
MAZE_GOAL = tuple(list(range(1, 16)) + [0])
UP, DOWN, LEFT, RIGHT = range(4)
_DELTA = {UP: -SIDE, DOWN: SIDE, LEFT: -1, RIGHT: 1}
#: the blank's scramble from the goal; the default start configuration
MAZE_SCRAMBLE = (UP, LEFT, UP, LEFT, DOWN, RIGHT, UP, LEFT)


def maze_moves(blank: int) -> list:
    r, c = divmod(blank, SIDE)
    out = []
    if r > 0:
        out.append(UP)
    if r < SIDE - 1:
        out.append(DOWN)
    if c > 0:
        out.append(LEFT)
    if c < SIDE - 1:
        out.append(RIGHT)
    return out


def slide(board, move):
    board = list(board)
    b = board.index(0)
    t = b + _DELTA[move]
    if move not in maze_moves(b):
        raise ValueError(f"illegal move {move} with blank at {b}")
    board[b], board[t] = board[t], 0
    return tuple(board)


def scrambled(moves=MAZE_SCRAMBLE, board=MAZE_GOAL):
    for m in moves:
        board = slide(board, m)
    return board


MAZE_START = scrambled()


def gen_maze(n: int, start=None, goal=None) -> SearchProgram:
    if n < 0:
        raise ValueError("maze depth must be non-negative")
    start = MAZE_START if start is None else tuple(start)
    goal = MAZE_GOAL if goal is None else tuple(goal)
    if sorted(start) != list(range(16)) or sorted(goal) != list(range(16)):
        raise ValueError("boards must be permutations of 0..15")
    cells = list(start) + [start.index(0), 0] + [0] * n
    moves = [maze_moves(b) for b in range(16)]

    def expand(cells):
        k = cells[17]
        if k == n:
            return SOLUTION if tuple(cells[:16]) == goal else None
        return moves[cells[16]]

    def apply(state, move):
        cells = state.cells
        b = cells[16]
        t = b + _DELTA[move]
        k = cells[17]
        state.write(b, cells[t])
        state.write(t, 0)
        state.write(16, t)
        state.write(18 + k, move)
        state.write(17, k + 1)
        return True

    return SearchProgram(f"maze({n})", Store(cells, 18), expand, apply,
                         solution=lambda cells: tuple(cells[18:18 + n]))


PROGRAMS = {"queens": gen_queens, "nsort": gen_nsort, "ham": gen_ham, "maze": gen_maze}


def make_program(name: str, size: int) -> SearchProgram:
    try:
        gen = PROGRAMS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}") from None
    return gen(size)

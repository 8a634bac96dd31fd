"""Regenerate data/tic-tac-toe.csv: every legal end-of-game board where x moved first.

Class is "positive" when x completed a line, "negative" otherwise (o won or draw).
Boards are emitted in the row order of the classic endgame file: positives first,
each class sorted by board with x < o < b per square.
"""
import sys

LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]
HEADER = [
    "top-left", "top-middle", "top-right",
    "middle-left", "middle-middle", "middle-right",
    "bottom-left", "bottom-middle", "bottom-right", "class",
]


def winner(board):
    for a, b, c in LINES:
        if board[a] != "b" and board[a] == board[b] == board[c]:
            return board[a]
    return None


def walk(board, player, seen):
    w = winner(board)
    if w is not None or "b" not in board:
        seen.add(tuple(board))
        return
    for i in range(9):
        if board[i] == "b":
            board[i] = player
            walk(board, "o" if player == "x" else "x", seen)
            board[i] = "b"


def main(out):
    seen = set()
    walk(["b"] * 9, "x", seen)
    order = {"x": 0, "o": 1, "b": 2}
    rows = sorted(seen, key=lambda bd: (winner(bd) != "x", [order[c] for c in bd]))
    with open(out, "w") as f:
        f.write(",".join(HEADER) + "\n")
        for bd in rows:
            cls = "positive" if winner(bd) == "x" else "negative"
            f.write(",".join(bd) + "," + cls + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/tic-tac-toe.csv")

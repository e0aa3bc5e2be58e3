//! Square-grid helpers shared by the grid environments. Cells are indexed
//! row-major, `cell = y * side + x`.

pub type Cell = [usize; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    North,
    South,
    West,
    East,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::North, Move::South, Move::West, Move::East];
}

pub fn cell_index(c: Cell, side: usize) -> usize {
    c[1] * side + c[0]
}

pub fn cell_at(index: usize, side: usize) -> Cell {
    [index % side, index / side]
}

/// Neighbour in direction `m`, or `None` at the wall.
pub fn shift(c: Cell, m: Move, side: usize) -> Option<Cell> {
    let [x, y] = c;
    match m {
        Move::North if y + 1 < side => Some([x, y + 1]),
        Move::South if y > 0 => Some([x, y - 1]),
        Move::West if x > 0 => Some([x - 1, y]),
        Move::East if x + 1 < side => Some([x + 1, y]),
        _ => None,
    }
}

pub fn manhattan(a: Cell, b: Cell) -> usize {
    a[0].abs_diff(b[0]) + a[1].abs_diff(b[1])
}

pub fn euclid(a: Cell, b: Cell) -> f64 {
    let dx = a[0] as f64 - b[0] as f64;
    let dy = a[1] as f64 - b[1] as f64;
    (dx * dx + dy * dy).sqrt()
}

pub fn on_grid(c: Cell, side: usize) -> bool {
    c[0] < side && c[1] < side
}

/// Moves that walk from `from` to `to` along an L-shaped path.
pub fn l_path(from: Cell, to: Cell, x_first: bool) -> Vec<Move> {
    let horizontal = if to[0] >= from[0] {
        vec![Move::East; to[0] - from[0]]
    } else {
        vec![Move::West; from[0] - to[0]]
    };
    let vertical = if to[1] >= from[1] {
        vec![Move::North; to[1] - from[1]]
    } else {
        vec![Move::South; from[1] - to[1]]
    };
    if x_first {
        [horizontal, vertical].concat()
    } else {
        [vertical, horizontal].concat()
    }
}

/// Shortest move sequence from `from` to `to` through cells for which
/// `open` holds, or `None` if `to` is unreachable.
pub fn bfs_path(
    from: Cell,
    to: Cell,
    side: usize,
    open: impl Fn(Cell) -> bool,
) -> Option<Vec<Move>> {
    use std::collections::VecDeque;
    let mut came: Vec<Option<(usize, Move)>> = vec![None; side * side];
    let mut seen = vec![false; side * side];
    let mut queue = VecDeque::from([from]);
    seen[cell_index(from, side)] = true;
    while let Some(c) = queue.pop_front() {
        if c == to {
            let mut path = Vec::new();
            let mut at = cell_index(c, side);
            while let Some((prev, m)) = came[at] {
                path.push(m);
                at = prev;
            }
            path.reverse();
            return Some(path);
        }
        for m in Move::ALL {
            if let Some(n) = shift(c, m, side) {
                let i = cell_index(n, side);
                if !seen[i] && open(n) {
                    seen[i] = true;
                    came[i] = Some((cell_index(c, side), m));
                    queue.push_back(n);
                }
            }
        }
    }
    None
}

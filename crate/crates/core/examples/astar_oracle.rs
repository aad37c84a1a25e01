//! Optimal 8-connected search on a hand-drawn map.
//!
//!     cargo run --example astar_oracle

use gridfcn::{astar_search, path_length, Cell, GridMap};

fn main() {
    let grid = GridMap::from_ascii(&[
        "..........",
        ".######...",
        "......#...",
        ".####.#.#.",
        ".#....#.#.",
        ".#.####.#.",
        ".#......#.",
        ".######.#.",
        "........#.",
        "........#.",
    ]);
    let (start, goal) = (Cell::new(4, 2), Cell::new(9, 9));
    let (result, stats) = astar_search(&grid, start, goal);
    match result {
        Ok(path) => {
            println!("cost {} = {:.4} over {} moves", path.cost(), path_length(&path), path.steps());
            println!("expanded {} nodes in {:?}", stats.expanded, stats.wall_time);
            let mask = path.mask(grid.size());
            for r in 0..grid.size() {
                let line: String = (0..grid.size())
                    .map(|c| match (grid.is_obstacle(Cell::new(r, c)), mask[r * grid.size() + c]) {
                        (true, _) => '#',
                        (false, 1) => '*',
                        _ => '.',
                    })
                    .collect();
                println!("{line}");
            }
        }
        Err(e) => println!("no path: {e}"),
    }
}

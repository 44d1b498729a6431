//! JSON game files:
//!
//! ```json
//! {"players": 2, "actions": 2, "scale": "raw",
//!  "losses": [[[1.0, -1.0], [-1.0, 1.0]], [[-1.0, 1.0], [1.0, -1.0]]]}
//! ```
//!
//! `losses[i]` is player `i`'s loss tensor as `players` levels of nested
//! arrays, indexed by player 0's action first.

use std::path::Path;

use regretlab_core::{Game, Scale};
use serde_json::{json, Value};

use crate::error::{AppError, Result};

pub fn to_json(game: &Game) -> Value {
    let n = game.num_actions();
    let m = game.num_players();
    let losses: Vec<Value> = (0..m).map(|i| nest(game.losses(i), n, m)).collect();
    json!({
        "players": m,
        "actions": n,
        "scale": game.scale().name(),
        "losses": losses,
    })
}

fn nest(flat: &[f64], n: usize, depth: usize) -> Value {
    if depth == 1 {
        return Value::from(flat.to_vec());
    }
    let stride = flat.len() / n;
    Value::Array(flat.chunks(stride).map(|c| nest(c, n, depth - 1)).collect())
}

pub fn from_json(value: &Value) -> Result<Game> {
    let bad = |msg: &str| AppError::Validation(format!("game file: {msg}"));
    let field = |k: &str| value.get(k).ok_or_else(|| bad(&format!("missing field `{k}`")));
    let m = field("players")?.as_u64().ok_or_else(|| bad("`players` must be a positive integer"))? as usize;
    let n = field("actions")?.as_u64().ok_or_else(|| bad("`actions` must be a positive integer"))? as usize;
    let scale = field("scale")?
        .as_str()
        .and_then(Scale::from_name)
        .ok_or_else(|| bad("`scale` must be \"raw\" or \"unit\""))?;
    let tensors = field("losses")?.as_array().ok_or_else(|| bad("`losses` must be an array"))?;
    let mut losses = Vec::with_capacity(tensors.len());
    for (i, t) in tensors.iter().enumerate() {
        let mut flat = Vec::new();
        flatten(t, n, m, &mut flat).map_err(|e| bad(&format!("losses[{i}]: {e}")))?;
        losses.push(flat);
    }
    Ok(Game::new(m, n, losses, scale)?)
}

fn flatten(v: &Value, n: usize, depth: usize, out: &mut Vec<f64>) -> std::result::Result<(), String> {
    let items = v.as_array().ok_or("expected a nested array")?;
    if items.len() != n {
        return Err(format!("expected {n} entries, found {}", items.len()));
    }
    for item in items {
        if depth == 1 {
            out.push(item.as_f64().ok_or("expected a number")?);
        } else {
            flatten(item, n, depth - 1, out)?;
        }
    }
    Ok(())
}

pub fn write(game: &Game, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_json(game))?;
    std::fs::write(path, text + "\n").map_err(|e| AppError::io(path, e))
}

pub fn read(path: &Path) -> Result<Game> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    from_json(&serde_json::from_str(&text)?)
}

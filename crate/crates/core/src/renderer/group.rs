use super::RenderConfig;
use crate::layout::Element;

/// Partition of taglines into style groups. Group ids are numbered by the
/// smallest tagline index they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    group_of: Vec<usize>,
    count: usize,
}

impl Grouping {
    pub fn group_of(&self, tagline: usize) -> usize {
        self.group_of[tagline]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.group_of
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.group_of.len()).filter(|&i| self.group_of[i] == group).collect()
    }
}

fn similar(a: &Element, b: &Element, cfg: &RenderConfig) -> bool {
    let (a, b) = (a.bbox(), b.bbox());
    let tallest = a.h.max(b.h);
    let heights = tallest <= 0.0 || (a.h - b.h).abs() / tallest <= cfg.group_height_tolerance;
    let aligned = (a.x - b.x).abs() <= cfg.group_center_tolerance
        || (a.y - b.y).abs() <= cfg.group_center_tolerance;
    heights && aligned
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = i;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Groups taglines of similar height that share a row or column centre,
/// closed transitively.
pub fn group_taglines(taglines: &[Element], cfg: &RenderConfig) -> Grouping {
    let n = taglines.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if similar(&taglines[i], &taglines[j], cfg) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut count = 0;
    let group_of = (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            if ids[root] == usize::MAX {
                ids[root] = count;
                count += 1;
            }
            ids[root]
        })
        .collect();
    Grouping { group_of, count }
}

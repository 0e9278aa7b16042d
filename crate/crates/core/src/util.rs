//! Small shared helpers.

/// Union-find over `usize` slots. The canonical representative of a class is
/// always its smallest member, which keeps operation order deterministic.
#[derive(Clone, Debug, Default)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new() -> Self {
        UnionFind { parent: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn push(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        id
    }

    /// Canonical representative, without path compression (usable on `&self`).
    pub fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Unites two classes; the smaller id wins. Returns the surviving root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return ra;
        }
        let (keep, lose) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[lose] = keep;
        keep
    }

    /// Points every slot directly at its root.
    pub fn flatten(&mut self) {
        for i in 0..self.parent.len() {
            let r = self.find(i);
            self.parent[i] = r;
        }
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&i| self.parent[i] == i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_id_wins() {
        let mut uf = UnionFind::new();
        for _ in 0..5 {
            uf.push();
        }
        uf.union(3, 1);
        assert_eq!(uf.find(3), 1);
        uf.union(4, 3);
        assert_eq!(uf.find(4), 1);
        uf.union(0, 4);
        assert_eq!(uf.find(1), 0);
        uf.flatten();
        assert_eq!(uf.find(3), 0);
        assert_eq!(uf.roots().count(), 2);
    }
}

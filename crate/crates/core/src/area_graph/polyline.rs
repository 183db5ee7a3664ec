use crate::geometry::Point;

/// Arc-length parameterized polyline.
#[derive(Debug, Clone)]
pub struct Polyline<'a> {
    pub points: &'a [Point],
    cum: Vec<f64>,
}

impl<'a> Polyline<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let mut cum = Vec::with_capacity(points.len());
        let mut s = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            s += w[0].dist(w[1]);
            cum.push(s);
        }
        Polyline { points, cum }
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Index of the segment containing parameter `t`.
    pub fn segment_at(&self, t: f64) -> usize {
        let n = self.points.len();
        if n < 2 {
            return 0;
        }
        let i = self.cum.partition_point(|&c| c <= t);
        i.saturating_sub(1).min(n - 2)
    }

    pub fn at(&self, t: f64) -> Point {
        let n = self.points.len();
        if n == 1 || t <= 0.0 {
            return self.points[0];
        }
        if t >= self.length() {
            return self.points[n - 1];
        }
        let i = self.segment_at(t);
        let seg = self.cum[i + 1] - self.cum[i];
        if seg <= 0.0 {
            return self.points[i];
        }
        self.points[i].lerp(self.points[i + 1], (t - self.cum[i]) / seg)
    }

    /// Sub-polyline between two parameters, endpoints included.
    pub fn slice(&self, t0: f64, t1: f64) -> Vec<Point> {
        let mut out = vec![self.at(t0)];
        for (i, &c) in self.cum.iter().enumerate() {
            if c > t0 && c < t1 {
                out.push(self.points[i]);
            }
        }
        let end = self.at(t1);
        if out.last().is_none_or(|&p| p != end) || out.len() == 1 {
            out.push(end);
        }
        out
    }

    /// Parameter of the point of the polyline closest to `p`.
    pub fn project(&self, p: Point) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.points.len().saturating_sub(1) {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let d = b - a;
            let l2 = d.norm2();
            let u = if l2 > 0.0 { ((p - a).dot(d) / l2).clamp(0.0, 1.0) } else { 0.0 };
            let q = a.lerp(b, u);
            let dist = q.dist(p);
            if dist < best.0 {
                best = (dist, self.cum[i] + u * l2.sqrt());
            }
        }
        if self.points.len() == 1 {
            best = (self.points[0].dist(p), 0.0);
        }
        (best.1, best.0)
    }
}

//! Minimal deterministic SVG writer for line plots.

use std::fmt::Write;

/// Two decimals, with negative zero printed as zero.
fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Clone, Debug)]
pub struct Style {
    pub stroke: &'static str,
    pub width: f64,
    pub dash: Option<&'static str>,
}

impl Style {
    pub const fn solid(stroke: &'static str, width: f64) -> Self {
        Self {
            stroke,
            width,
            dash: None,
        }
    }

    pub const fn dashed(stroke: &'static str, width: f64) -> Self {
        Self {
            stroke,
            width,
            dash: Some("6 4"),
        }
    }

    fn attrs(&self) -> String {
        let mut s = format!(
            "fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"",
            self.stroke,
            num(self.width)
        );
        if let Some(d) = self.dash {
            let _ = write!(s, " stroke-dasharray=\"{d}\"");
        }
        s
    }
}

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
    clip_ids: usize,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
            clip_ids: 0,
        }
    }

    pub fn raw(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), style: &Style) {
        self.raw(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>",
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1),
            style.attrs()
        ));
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], style: &Style) {
        if pts.len() < 2 {
            return;
        }
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        self.raw(&format!("<polyline points=\"{}\" {}/>", p.join(" "), style.attrs()));
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, stroke: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        self.raw(&format!(
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"0.50\"/>",
            p.join(" ")
        ));
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str, stroke: &str) {
        self.raw(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"1.00\"/>",
            num(c.0),
            num(c.1),
            num(r)
        ));
    }

    pub fn text(&mut self, at: (f64, f64), s: &str, size: f64, anchor: &str) {
        self.raw(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"{anchor}\">{}</text>",
            num(at.0),
            num(at.1),
            num(size),
            escape(s)
        ));
    }

    fn next_clip(&mut self) -> String {
        self.clip_ids += 1;
        format!("clip{}", self.clip_ids)
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = num(self.width),
            h = num(self.height)
        )
    }
}

/// A rectangular plotting area mapping data coordinates to pixels.
#[derive(Clone, Debug)]
pub struct Panel {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    clip: String,
}

impl Panel {
    pub fn new(svg: &mut Svg, rect: (f64, f64, f64, f64), x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let clip = svg.next_clip();
        svg.raw(&format!(
            "<clipPath id=\"{clip}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>",
            num(rect.0),
            num(rect.1),
            num(rect.2),
            num(rect.3)
        ));
        Self {
            left: rect.0,
            top: rect.1,
            width: rect.2,
            height: rect.3,
            x_range,
            y_range,
            clip,
        }
    }

    /// Same data scale on both axes, centred in `rect`.
    pub fn equal(svg: &mut Svg, rect: (f64, f64, f64, f64), x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let sx = rect.2 / (x_range.1 - x_range.0);
        let sy = rect.3 / (y_range.1 - y_range.0);
        let s = sx.min(sy);
        let (w, h) = ((x_range.1 - x_range.0) * s, (y_range.1 - y_range.0) * s);
        Self::new(
            svg,
            (rect.0 + (rect.2 - w) / 2.0, rect.1 + (rect.3 - h) / 2.0, w, h),
            x_range,
            y_range,
        )
    }

    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let tx = (x - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let ty = (y - self.y_range.0) / (self.y_range.1 - self.y_range.0);
        (self.left + tx * self.width, self.top + (1.0 - ty) * self.height)
    }

    pub fn frame(&self, svg: &mut Svg, title: &str) {
        svg.raw(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.00\"/>",
            num(self.left),
            num(self.top),
            num(self.width),
            num(self.height)
        ));
        svg.text((self.left + self.width / 2.0, self.top - 8.0), title, 13.0, "middle");
    }

    /// Tick marks with labels on both axes.
    pub fn ticks(&self, svg: &mut Svg, xs: &[(f64, &str)], ys: &[(f64, &str)]) {
        let st = Style::solid("black", 1.0);
        let bottom = self.top + self.height;
        for (x, label) in xs {
            let (px, _) = self.map(*x, self.y_range.0);
            svg.line((px, bottom), (px, bottom + 5.0), &st);
            svg.text((px, bottom + 17.0), label, 11.0, "middle");
        }
        for (y, label) in ys {
            let (_, py) = self.map(self.x_range.0, *y);
            svg.line((self.left - 5.0, py), (self.left, py), &st);
            svg.text((self.left - 8.0, py + 4.0), label, 11.0, "end");
        }
    }

    pub fn labels(&self, svg: &mut Svg, x: &str, y: &str) {
        svg.text((self.left + self.width / 2.0, self.top + self.height + 34.0), x, 12.0, "middle");
        svg.text((self.left - 40.0, self.top + self.height / 2.0), y, 12.0, "middle");
    }

    pub fn polyline(&self, svg: &mut Svg, pts: &[(f64, f64)], style: &Style) {
        let px: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| self.map(x, y)).collect();
        svg.raw(&format!("<g clip-path=\"url(#{})\">", self.clip));
        svg.polyline(&px, style);
        svg.raw("</g>");
    }

    pub fn marker(&self, svg: &mut Svg, x: f64, y: f64, filled: bool, color: &str) {
        let fill = if filled { color } else { "white" };
        svg.circle(self.map(x, y), 3.5, fill, color);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_and_escape() {
        assert_eq!(num(-0.001), "0.00");
        assert_eq!(escape("a<b&c"), "a&lt;b&amp;c");
    }

    #[test]
    fn panel_maps_corners() {
        let mut s = Svg::new(100.0, 100.0);
        let p = Panel::new(&mut s, (10.0, 10.0, 80.0, 80.0), (0.0, 1.0), (-1.0, 1.0));
        assert_eq!(p.map(0.0, -1.0), (10.0, 90.0));
        assert_eq!(p.map(1.0, 1.0), (90.0, 10.0));
    }
}

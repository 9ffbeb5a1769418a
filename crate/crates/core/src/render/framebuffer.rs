/// Linear-RGB color, depth and coverage planes of one render.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    width: u32,
    height: u32,
    pub color: Vec<[f64; 3]>,
    pub depth: Vec<f64>,
    pub coverage: Vec<bool>,
}

impl FrameBuffer {
    /// Black, infinitely deep and uncovered.
    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            color: vec![[0.0; 3]; n],
            depth: vec![f64::INFINITY; n],
            coverage: vec![false; n],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn covered_pixels(&self) -> usize {
        self.coverage.iter().filter(|&&c| c).count()
    }
}

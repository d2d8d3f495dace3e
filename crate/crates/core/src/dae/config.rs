use std::fmt;

/// Tag of the encoder feature map the skip pathway re-injects.
pub const SKIP_TAG: &str = "enc1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    /// 3×3 convolution, padding 1, followed by ReLU.
    Conv3x3,
    MaxPool2x2,
    /// 2×2 transposed convolution at stride 2 (doubles H and W).
    TransposedConv2x2,
    /// Channel concatenation `[decoder, skip_source]`.
    ConcatSkip,
    /// 3×3 convolution, padding 1, followed by sigmoid.
    Conv3x3Sigmoid,
}

impl LayerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Conv3x3 => "conv3x3",
            LayerKind::MaxPool2x2 => "maxpool2x2",
            LayerKind::TransposedConv2x2 => "transposed_conv2x2",
            LayerKind::ConcatSkip => "concat_skip",
            LayerKind::Conv3x3Sigmoid => "conv3x3_sigmoid",
        }
    }

    pub fn has_params(self) -> bool {
        matches!(
            self,
            LayerKind::Conv3x3 | LayerKind::TransposedConv2x2 | LayerKind::Conv3x3Sigmoid
        )
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_ch: usize,
    pub out_ch: usize,
    /// Names this layer's output so a later [`LayerKind::ConcatSkip`] can use it.
    pub tag: Option<String>,
    /// For [`LayerKind::ConcatSkip`]: the tag whose output is appended.
    pub skip_source: Option<String>,
}

impl LayerSpec {
    pub fn new(kind: LayerKind, in_ch: usize, out_ch: usize) -> Self {
        Self {
            kind,
            in_ch,
            out_ch,
            tag: None,
            skip_source: None,
        }
    }

    fn tagged(mut self, tag: &str) -> Self {
        self.tag = Some(tag.to_string());
        self
    }

    fn reading(mut self, tag: &str) -> Self {
        self.skip_source = Some(tag.to_string());
        self
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error(
        "layer {index} ({kind}): expects {expected} input channels, previous layer gives {found}"
    )]
    ChannelChain {
        index: usize,
        kind: LayerKind,
        expected: usize,
        found: usize,
    },
    #[error("layer {index} ({kind}): {reason}")]
    Layer {
        index: usize,
        kind: LayerKind,
        reason: String,
    },
    #[error("network must contain exactly one max-pool layer, found {0}")]
    PoolCount(usize),
    #[error("{0}")]
    Topology(String),
}

/// Declarative autoencoder description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkConfig {
    pub use_skip: bool,
    pub base_channels: usize,
    /// `(height, width)` of the single-channel input.
    pub input_size: (usize, usize),
    pub layers: Vec<LayerSpec>,
}

impl NetworkConfig {
    /// Standard layer table for a given width `c` at 128×128 input:
    ///
    /// | stage   | layer                       | channels        |
    /// |---------|-----------------------------|-----------------|
    /// | encoder | conv3x3 + ReLU              | 1 → c           |
    /// |         | conv3x3 + ReLU (`enc1`)     | c → c           |
    /// |         | maxpool 2×2                 | c               |
    /// |         | conv3x3 + ReLU              | c → 2c          |
    /// |         | conv3x3 + ReLU              | 2c → 2c         |
    /// | decoder | transposed conv 2×2, s=2    | 2c → c          |
    /// |         | concat `enc1` (skip only)   | c → 2c          |
    /// |         | conv3x3 + ReLU              | 2c or c → c     |
    /// |         | conv3x3 + sigmoid           | c → 1           |
    pub fn new(use_skip: bool, base_channels: usize) -> Self {
        let c = base_channels;
        let mut layers = vec![
            LayerSpec::new(LayerKind::Conv3x3, 1, c),
            LayerSpec::new(LayerKind::Conv3x3, c, c).tagged(SKIP_TAG),
            LayerSpec::new(LayerKind::MaxPool2x2, c, c),
            LayerSpec::new(LayerKind::Conv3x3, c, 2 * c),
            LayerSpec::new(LayerKind::Conv3x3, 2 * c, 2 * c),
            LayerSpec::new(LayerKind::TransposedConv2x2, 2 * c, c),
        ];
        let decoder_in = if use_skip {
            layers.push(LayerSpec::new(LayerKind::ConcatSkip, c, 2 * c).reading(SKIP_TAG));
            2 * c
        } else {
            c
        };
        layers.push(LayerSpec::new(LayerKind::Conv3x3, decoder_in, c));
        layers.push(LayerSpec::new(LayerKind::Conv3x3Sigmoid, c, 1));
        Self {
            use_skip,
            base_channels,
            input_size: (128, 128),
            layers,
        }
    }

    pub fn with_input_size(mut self, height: usize, width: usize) -> Self {
        self.input_size = (height, width);
        self
    }

    /// Position of the layer carrying `tag`.
    pub fn tag_index(&self, tag: &str) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| l.tag.as_deref() == Some(tag))
    }

    /// Input channel count of every parameterized decoder convolution.
    pub fn decoder_conv_inputs(&self) -> Vec<usize> {
        let up = self
            .layers
            .iter()
            .position(|l| l.kind == LayerKind::TransposedConv2x2)
            .unwrap_or(self.layers.len());
        self.layers[up + 1..]
            .iter()
            .filter(|l| l.kind.has_params())
            .map(|l| l.in_ch)
            .collect()
    }

    /// Checks channel arithmetic, the single pooling layer, skip placement
    /// and that the output resolution equals the input resolution.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (h, w) = self.input_size;
        if h == 0 || w == 0 || h % 2 != 0 || w % 2 != 0 {
            return Err(ConfigError::Topology(format!(
                "input size {h}x{w} must be positive and even"
            )));
        }
        let pools = self
            .layers
            .iter()
            .filter(|l| l.kind == LayerKind::MaxPool2x2)
            .count();
        if pools != 1 {
            return Err(ConfigError::PoolCount(pools));
        }
        let concats = self
            .layers
            .iter()
            .filter(|l| l.kind == LayerKind::ConcatSkip)
            .count();
        if !self.use_skip && concats > 0 {
            return Err(ConfigError::Topology(
                "concat_skip in a no-skip network".into(),
            ));
        }
        if self.use_skip && concats == 0 {
            return Err(ConfigError::Topology(
                "skip network without a concat_skip layer".into(),
            ));
        }

        let mut channels = 1;
        // Downsampling level: 0 = input resolution, 1 = after the pool.
        let mut level: i32 = 0;
        let mut tags: Vec<(&str, usize, i32)> = Vec::new();
        for (index, l) in self.layers.iter().enumerate() {
            let fail = |reason: String| ConfigError::Layer {
                index,
                kind: l.kind,
                reason,
            };
            if l.in_ch != channels {
                return Err(ConfigError::ChannelChain {
                    index,
                    kind: l.kind,
                    expected: l.in_ch,
                    found: channels,
                });
            }
            if l.in_ch == 0 || l.out_ch == 0 {
                return Err(fail("channel counts must be positive".into()));
            }
            match l.kind {
                LayerKind::MaxPool2x2 => {
                    if l.out_ch != l.in_ch {
                        return Err(fail("pooling cannot change channel count".into()));
                    }
                    level += 1;
                }
                LayerKind::TransposedConv2x2 => {
                    level -= 1;
                    if level < 0 {
                        return Err(fail("upsampling above input resolution".into()));
                    }
                }
                LayerKind::ConcatSkip => {
                    let source = l
                        .skip_source
                        .as_deref()
                        .ok_or_else(|| fail("missing skip_source".into()))?;
                    let &(_, src_ch, src_level) = tags
                        .iter()
                        .find(|(t, _, _)| *t == source)
                        .ok_or_else(|| fail(format!("unknown skip source {source:?}")))?;
                    if src_level != level {
                        return Err(fail(format!(
                            "skip source {source:?} is at a different resolution"
                        )));
                    }
                    if l.out_ch != l.in_ch + src_ch {
                        return Err(fail(format!(
                            "concatenation gives {} channels, layer declares {}",
                            l.in_ch + src_ch,
                            l.out_ch
                        )));
                    }
                }
                LayerKind::Conv3x3 | LayerKind::Conv3x3Sigmoid => {}
            }
            if let Some(tag) = l.tag.as_deref() {
                tags.push((tag, l.out_ch, level));
            }
            channels = l.out_ch;
        }
        if level != 0 {
            return Err(ConfigError::Topology(
                "output resolution differs from input".into(),
            ));
        }
        match self.layers.last() {
            Some(l) if l.kind == LayerKind::Conv3x3Sigmoid && l.out_ch == 1 => Ok(()),
            _ => Err(ConfigError::Topology(
                "network must end in a single-channel conv3x3_sigmoid".into(),
            )),
        }
    }
}

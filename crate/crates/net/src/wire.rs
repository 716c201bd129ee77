use std::collections::VecDeque;
use std::io;

use hearts_core::protocol::{encode_message, Frame, LineFramer, Message};
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};

/// Yields complete frames from a byte stream.
pub struct FrameReader<R> {
    inner: R,
    framer: LineFramer,
    ready: VecDeque<Frame>,
    buf: Box<[u8]>,
}

impl<R: AsyncRead + Unpin> FrameReader<R> {
    pub fn new(inner: R) -> FrameReader<R> {
        FrameReader { inner, framer: LineFramer::new(), ready: VecDeque::new(), buf: vec![0; 8192].into_boxed_slice() }
    }

    /// `Ok(None)` at end of stream. Blank lines are skipped.
    pub async fn next_frame(&mut self) -> io::Result<Option<Frame>> {
        loop {
            while let Some(frame) = self.ready.pop_front() {
                match &frame {
                    Frame::Line(l) if l.iter().all(u8::is_ascii_whitespace) => continue,
                    _ => return Ok(Some(frame)),
                }
            }
            let n = self.inner.read(&mut self.buf).await?;
            if n == 0 {
                return Ok(None);
            }
            self.ready.extend(self.framer.push(&self.buf[..n]));
        }
    }
}

pub async fn write_message<W: AsyncWrite + Unpin>(out: &mut W, message: &Message) -> io::Result<()> {
    out.write_all(&encode_message(message)).await
}

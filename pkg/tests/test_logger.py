"""
Tests for logger
"""

import pytest
import tempfile
import warnings
from pathlib import Path
from src.logging.logger import AppLogger


@pytest.fixture
def temp_log():
    """Create temporary log file"""
    with tempfile.NamedTemporaryFile(mode='w', suffix='.log', delete=False) as f:
        log_path = f.name
    yield log_path
    Path(log_path).unlink(missing_ok=True)


def test_logger_creates_file(temp_log):
    """Test that logger creates log file"""
    logger = AppLogger(Path(temp_log))
    logger.info("Test message")
    logger.close()

    assert Path(temp_log).exists()
    content = Path(temp_log).read_text()
    assert "Test message" in content


def test_logger_decision_format(temp_log):
    """Test decision logging format"""
    logger = AppLogger(Path(temp_log))
    logger.log_decision(1.2, "Forward", "Stop")
    logger.log_decision(1.4, "TurnLeft", "TurnLeft")
    logger.close()

    content = Path(temp_log).read_text()
    assert "[DECISION] t=1.2s Forward overridden -> Stop" in content
    assert "[DECISION] t=1.4s TurnLeft" in content


def test_logger_summary_format(temp_log):
    """Test simulation summary format"""
    logger = AppLogger(Path(temp_log))
    logger.log_summary(150, 0, {"Forward": 140, "Stop": 10})
    logger.log_collision(3.0, 1.0, 2.0)
    logger.close()

    content = Path(temp_log).read_text()
    assert "[SUMMARY] ticks: 150, collisions: 0, Forward: 140, Stop: 10" in content
    assert "[COLLISION] t=3.0s at (1.000, 2.000)" in content


def test_logger_stage_and_timing(temp_log):
    """Test stage and timing lines"""
    logger = AppLogger(Path(temp_log))
    logger.log_stage("match", "160x120")
    logger.log_timing("match", 12.345)
    logger.close()

    content = Path(temp_log).read_text()
    assert "[STAGE] match - 160x120" in content
    assert "[TIMING] match 12.3 ms" in content


def test_logger_captures_warnings(temp_log):
    """Test that pipeline warnings reach the log file"""
    logger = AppLogger(Path(temp_log))
    warnings.warn("band outside horopter", UserWarning)
    logger.close()

    assert "band outside horopter" in Path(temp_log).read_text()


def test_logger_decision_without_frame(temp_log):
    """Test decision lines for ticks that rendered no frame"""
    logger = AppLogger(Path(temp_log))
    logger.log_decision(2.0, None, "Turn90")
    logger.log_decision(2.2, None, "Stop")
    logger.close()

    content = Path(temp_log).read_text()
    assert "[DECISION] t=2.0s Turn90 (no frame)" in content
    assert "[DECISION] t=2.2s Stop (no frame)" in content
    assert "None" not in content

"""Tests for core components."""
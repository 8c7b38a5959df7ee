"""Test suite for Business Logic Orchestrator."""
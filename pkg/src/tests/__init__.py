#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Pacote de testes do MBCR.
"""

static int sdhci_sprd_probe_host(struct platform_device *pdev,
				 struct sdhci_host *host)
{
	struct sdhci_sprd_host *sprd_host;
	struct resource *res;

	sprd_host = devm_kzalloc(&pdev->dev, sizeof(*sprd_host), GFP_KERNEL);
	sprd_host->host = host;
	sprd_host->flags = SDHCI_SPRD_FLAG_HS400;
	sprd_host->pdev = pdev;

	res = platform_get_resource(pdev, IORESOURCE_MEM, 0);
	sprd_host->phy_base = res->start;
	platform_set_drvdata(pdev, sprd_host);

	return 0;
}

static int sdhci_pltfm_init_priv(struct platform_device *pdev,
				 struct sdhci_pltfm_host *pltfm_host)
{
	struct sdhci_pltfm_priv *priv;

	priv = devm_kzalloc(&pdev->dev, sizeof(*priv), GFP_KERNEL);
	if (!priv)
		return -ENOMEM;

	priv->clk = devm_clk_get(&pdev->dev, NULL);
	if (IS_ERR(priv->clk))
		return PTR_ERR(priv->clk);

	pltfm_host->priv = priv;
	return 0;
}

static void sdhci_pltfm_set_clock(struct sdhci_host *host, unsigned int clock)
{
	u16 clk;

	host->mmc->actual_clock = 0;
	sdhci_writew(host, 0, SDHCI_CLOCK_CONTROL);

	if (clock == 0)
		return;

	clk = sdhci_calc_clk(host, clock, &host->mmc->actual_clock);
	sdhci_enable_clk(host, clk);
}

static unsigned int sdhci_pltfm_get_max_clock(struct sdhci_host *host)
{
	struct sdhci_pltfm_host *pltfm_host = sdhci_priv(host);

	return clk_get_rate(pltfm_host->clk);
}

static int imx_pgc_read_latency(struct imx_pgc_domain *domain)
{
	struct device_node *node;
	u32 latency;
	int ret;

	node = of_find_compatible_node(NULL, NULL, "fsl,imx7d-gpc");
	if (!node) {
		dev_warn(domain->dev, "no gpc node\n");
		return -ENODEV;
	}

	domain->flags |= IMX_PGC_HAS_LATENCY;
	ret = of_property_read_u32(node, "power-up-latency-us", &latency);
	if (ret)
		return ret;

	domain->power_up_latency = latency;
	domain->power_down_latency = latency / 2;
	of_node_put(node);

	return 0;
}

static int imx_gpcv2_probe(struct platform_device *pdev)
{
	struct device *dev = &pdev->dev;
	struct device_node *pgc_np, *np;
	struct regmap *regmap;
	void __iomem *base;
	int ret;

	pgc_np = of_get_child_by_name(dev->of_node, "pgc");
	if (!pgc_np) {
		dev_err(dev, "No power domains specified in DT\n");
		return -EINVAL;
	}

	base = devm_platform_ioremap_resource(pdev, 0);
	if (IS_ERR(base)) {
		of_node_put(pgc_np);
		return PTR_ERR(base);
	}

	regmap = devm_regmap_init_mmio(dev, base, &imx_gpcv2_regmap_config);
	if (IS_ERR(regmap)) {
		ret = PTR_ERR(regmap);
		dev_err(dev, "failed to init regmap (%d)\n", ret);
		of_node_put(pgc_np);
		return ret;
	}

	for_each_child_of_node(pgc_np, np) {
		ret = imx_gpcv2_add_domain(dev, np, regmap);
		if (ret) {
			of_node_put(np);
			break;
		}
	}

	of_node_put(pgc_np);
	return ret;
}

static int imx_gpc_power_on(struct imx_pm_domain *pd)
{
	int ret;
	u32 val;

	ret = regulator_enable(pd->supply);
	if (ret) {
		pr_err("%s: failed to enable regulator: %d\n", __func__, ret);
		return ret;
	}

	regmap_read(pd->regmap, pd->reg_offs + GPC_PGC_CTRL_OFFS, &val);
	val |= GPC_PGC_SW_PUP_REQ;
	regmap_write(pd->regmap, pd->reg_offs + GPC_PGC_CTRL_OFFS, val);

	return 0;
}
